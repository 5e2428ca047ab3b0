//! Lowering an N-body Pauli string to a layered attachment schedule.
//!
//! A schedule starts from a two-site `XX` seed, grows the support one layer at
//! a time with `(Z_c + X_c X_a)/√2` attachments, and finishes with one layer
//! of swappers that turns every site into its target letter.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QsaError, Result};
use crate::pauli::{Pauli, PauliString, WeightedPauliSum};
use crate::propagator::{
    apply_swap, conjugate_strict, make_attachment, make_swapper, AttachmentSpec,
    InvolutionRotation, SwapperSpec,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct ConnectivityGraph {
    n_sites: usize,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n_sites: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<RawGraph> for ConnectivityGraph {
    type Error = QsaError;
    fn try_from(r: RawGraph) -> Result<Self> {
        ConnectivityGraph::new(r.n_sites, r.edges.into_iter().map(|[a, b]| (a, b)))
    }
}

impl From<ConnectivityGraph> for RawGraph {
    fn from(g: ConnectivityGraph) -> Self {
        RawGraph {
            n_sites: g.n_sites,
            edges: g.edges.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl ConnectivityGraph {
    pub fn new(n_sites: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n_sites || b >= n_sites {
                return Err(QsaError::InvalidSpec(format!(
                    "edge ({a},{b}) out of range for {n_sites} sites"
                )));
            }
            if a == b {
                return Err(QsaError::InvalidSpec(format!("self-loop at site {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(ConnectivityGraph {
            n_sites,
            edges: set,
        })
    }

    pub fn complete(n_sites: usize) -> Self {
        let edges = (0..n_sites).flat_map(|a| (a + 1..n_sites).map(move |b| (a, b)));
        Self::new(n_sites, edges).expect("in range")
    }

    pub fn path(n_sites: usize) -> Self {
        Self::new(n_sites, (1..n_sites).map(|b| (b - 1, b))).expect("in range")
    }

    /// Path with nearest and next-nearest neighbour couplings.
    pub fn path_with_next_nearest(n_sites: usize) -> Self {
        let nn = (1..n_sites).map(|b| (b - 1, b));
        let nnn = (2..n_sites).map(|b| (b - 2, b));
        Self::new(n_sites, nn.chain(nnn)).expect("in range")
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(x, y)| {
                if x == a {
                    Some(y)
                } else if y == a {
                    Some(x)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Whether `sites` induce a connected subgraph.
    pub fn is_connected_on(&self, sites: &[usize]) -> bool {
        let Some(&start) = sites.first() else {
            return true;
        };
        let inside: BTreeSet<usize> = sites.iter().copied().collect();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for b in self.neighbors(a) {
                if inside.contains(&b) && seen.insert(b) {
                    queue.push_back(b);
                }
            }
        }
        seen.len() == inside.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Auto,
    Doubling,
    LineEndpoints,
    SingleEndpoint,
}

impl FromStr for Strategy {
    type Err = QsaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "doubling" => Ok(Strategy::Doubling),
            "line_endpoints" => Ok(Strategy::LineEndpoints),
            "single_endpoint" => Ok(Strategy::SingleEndpoint),
            other => Err(QsaError::InvalidSpec(format!("unknown strategy {other:?}"))),
        }
    }
}

/// The growth rule actually used by a compilation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolved {
    Doubling,
    LineEndpoints,
    SingleEndpoint,
    /// Maximum-matching frontier growth on graphs that admit none of the
    /// named topologies.
    Greedy,
}

impl fmt::Display for Resolved {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Resolved::Doubling => "doubling",
            Resolved::LineEndpoints => "line_endpoints",
            Resolved::SingleEndpoint => "single_endpoint",
            Resolved::Greedy => "greedy",
        };
        f.write_str(s)
    }
}

/// Minimum number of attachment layers for an `n_bodies` string.
pub fn depth_bound(n_bodies: usize, strategy: Strategy) -> Result<usize> {
    if n_bodies < 2 {
        return Err(QsaError::Domain(format!("need at least 2 bodies, got {n_bodies}")));
    }
    Ok(match strategy {
        Strategy::Auto | Strategy::Doubling => ceil_log2(n_bodies) - 1,
        Strategy::LineEndpoints => n_bodies.div_ceil(2) - 1,
        Strategy::SingleEndpoint => n_bodies - 2,
    })
}

fn ceil_log2(n: usize) -> usize {
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub string: PauliString,
    pub tg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsaSchedule {
    pub n_sites: usize,
    pub seed: Seed,
    pub layers: Vec<Vec<AttachmentSpec>>,
    pub final_swappers: Vec<SwapperSpec>,
    pub target: PauliString,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseKind {
    Seed,
    Attachment { layer: usize },
    Swapper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pulse {
    pub kind: PulseKind,
    pub rotation: InvolutionRotation,
}

/// Pulses in the order they act on a state (first element acts first).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseProgram {
    pub n_sites: usize,
    pub pulses: Vec<Pulse>,
}

impl PulseProgram {
    pub fn empty(n_sites: usize) -> Self {
        PulseProgram {
            n_sites,
            pulses: Vec::new(),
        }
    }

    pub fn extend(&mut self, other: PulseProgram) -> Result<()> {
        if other.n_sites != self.n_sites {
            return Err(QsaError::Dimension(self.n_sites, other.n_sites));
        }
        self.pulses.extend(other.pulses);
        Ok(())
    }

    /// Every pulse angle shifted by `delta`.
    pub fn offset(&self, delta: f64) -> PulseProgram {
        PulseProgram {
            n_sites: self.n_sites,
            pulses: self
                .pulses
                .iter()
                .map(|p| Pulse {
                    kind: p.kind,
                    rotation: p.rotation.with_angle(p.rotation.angle() + delta),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }
}

impl QsaSchedule {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn with_tg(mut self, tg: f64) -> Self {
        self.seed.tg = tg;
        self
    }

    /// Seed plus every attached site, in growth order.
    pub fn grown_support(&self) -> Vec<usize> {
        let mut sites = self.seed.string.support();
        for layer in &self.layers {
            sites.extend(layer.iter().map(|s| s.attached_site()));
        }
        sites
    }

    pub fn layer_generators(&self, layer: usize) -> Result<Vec<WeightedPauliSum>> {
        self.layers[layer]
            .iter()
            .map(|s| s.generator(self.n_sites))
            .collect()
    }

    /// Time-ordered pulses: inverse swappers, inverse attachments from the
    /// outermost layer in, the seed, then the forward pulses back out.
    pub fn pulse_program(&self) -> Result<PulseProgram> {
        let n = self.n_sites;
        let seed = InvolutionRotation::from_string(&self.seed.string, self.seed.tg)?;
        let swaps = self
            .final_swappers
            .iter()
            .map(|s| make_swapper(s, n))
            .collect::<Result<Vec<_>>>()?;
        let layers = self
            .layers
            .iter()
            .map(|l| l.iter().map(|s| make_attachment(s, n)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;

        let mut pulses = Vec::new();
        for s in &swaps {
            pulses.push(Pulse {
                kind: PulseKind::Swapper,
                rotation: s.inverse.clone(),
            });
        }
        for (k, layer) in layers.iter().enumerate().rev() {
            for p in layer {
                pulses.push(Pulse {
                    kind: PulseKind::Attachment { layer: k },
                    rotation: p.inverse.clone(),
                });
            }
        }
        pulses.push(Pulse {
            kind: PulseKind::Seed,
            rotation: seed,
        });
        for (k, layer) in layers.iter().enumerate() {
            for p in layer {
                pulses.push(Pulse {
                    kind: PulseKind::Attachment { layer: k },
                    rotation: p.forward.clone(),
                });
            }
        }
        for s in &swaps {
            pulses.push(Pulse {
                kind: PulseKind::Swapper,
                rotation: s.forward.clone(),
            });
        }
        Ok(PulseProgram { n_sites: n, pulses })
    }
}

/// Exact symbolic image of the seed under all layers and swappers.
pub fn replay_symbolic(schedule: &QsaSchedule) -> Result<PauliString> {
    let n = schedule.n_sites;
    let seed = &schedule.seed.string;
    if seed.n_sites() != n {
        return Err(QsaError::Dimension(n, seed.n_sites()));
    }
    if seed.phase() != 0 || seed.weight() != 2 {
        return Err(QsaError::InvalidSchedule(format!(
            "seed {seed} must be a two-site string with phase +1"
        )));
    }
    let mut current = seed.clone();
    for (l, layer) in schedule.layers.iter().enumerate() {
        for (k, spec) in layer.iter().enumerate() {
            let fwd = make_attachment(spec, n)?.forward;
            current = conjugate_strict(&current, &fwd).map_err(|_| {
                QsaError::InvalidSchedule(format!(
                    "layer {l} spec {k} (connector {} attaching {}) does not collapse",
                    spec.connector_site(),
                    spec.attached_site()
                ))
            })?;
        }
    }
    for (k, s) in schedule.final_swappers.iter().enumerate() {
        current = apply_swap(&current, s).map_err(|e| {
            QsaError::InvalidSchedule(format!("final swapper {k} at site {}: {e}", s.site()))
        })?;
    }
    Ok(current)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "invariant", rename_all = "snake_case")]
pub enum Violation {
    SiteCount { schedule: usize, graph: usize },
    SeedShape { seed: String },
    SeedEdge { a: usize, b: usize },
    LayerDisjointness { layer: usize, site: usize },
    Freshness { layer: usize, site: usize },
    EdgeExistence { layer: usize, connector: usize, attached: usize },
    ReplayEquality { expected: String, found: String },
    ReplayCollapse { reason: String },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::SiteCount { .. } => "site_count",
            Violation::SeedShape { .. } => "seed_shape",
            Violation::SeedEdge { .. } => "seed_edge",
            Violation::LayerDisjointness { .. } => "layer_disjointness",
            Violation::Freshness { .. } => "freshness",
            Violation::EdgeExistence { .. } => "edge_existence",
            Violation::ReplayEquality { .. } => "replay_equality",
            Violation::ReplayCollapse { .. } => "replay_collapse",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate(schedule: &QsaSchedule, graph: &ConnectivityGraph) -> ValidationReport {
    let mut v = Vec::new();
    let n = schedule.n_sites;
    if graph.n_sites() != n || schedule.target.n_sites() != n || schedule.seed.string.n_sites() != n {
        v.push(Violation::SiteCount {
            schedule: n,
            graph: graph.n_sites(),
        });
        return ValidationReport { violations: v };
    }
    let seed_sites = schedule.seed.string.support();
    if seed_sites.len() != 2 || schedule.seed.string.phase() != 0 {
        v.push(Violation::SeedShape {
            seed: schedule.seed.string.to_string(),
        });
    } else if !graph.has_edge(seed_sites[0], seed_sites[1]) {
        v.push(Violation::SeedEdge {
            a: seed_sites[0],
            b: seed_sites[1],
        });
    }

    let mut grown: BTreeSet<usize> = seed_sites.iter().copied().collect();
    for (l, layer) in schedule.layers.iter().enumerate() {
        let mut used = BTreeSet::new();
        for spec in layer {
            for site in [spec.connector_site(), spec.attached_site()] {
                if !used.insert(site) {
                    v.push(Violation::LayerDisjointness { layer: l, site });
                }
            }
            if grown.contains(&spec.attached_site()) {
                v.push(Violation::Freshness {
                    layer: l,
                    site: spec.attached_site(),
                });
            }
            if !graph.has_edge(spec.connector_site(), spec.attached_site()) {
                v.push(Violation::EdgeExistence {
                    layer: l,
                    connector: spec.connector_site(),
                    attached: spec.attached_site(),
                });
            }
        }
        grown.extend(layer.iter().map(|s| s.attached_site()));
    }

    match replay_symbolic(schedule) {
        Ok(found) if found == schedule.target => {}
        Ok(found) => v.push(Violation::ReplayEquality {
            expected: schedule.target.to_string(),
            found: found.to_string(),
        }),
        Err(e) => v.push(Violation::ReplayCollapse {
            reason: e.to_string(),
        }),
    }
    ValidationReport { violations: v }
}

/// Seed pair plus `(connector, attached)` pairs per layer.
#[derive(Debug, Clone, PartialEq)]
struct GrowthPlan {
    seed: (usize, usize),
    layers: Vec<Vec<(usize, usize)>>,
}

pub fn compile(target: &PauliString, graph: &ConnectivityGraph, strategy: Strategy) -> Result<QsaSchedule> {
    compile_resolved(target, graph, strategy).map(|(s, _)| s)
}

/// Compiles and also reports which growth rule produced the schedule.
pub fn compile_resolved(
    target: &PauliString,
    graph: &ConnectivityGraph,
    strategy: Strategy,
) -> Result<(QsaSchedule, Resolved)> {
    let n = target.n_sites();
    if graph.n_sites() != n {
        return Err(QsaError::Dimension(n, graph.n_sites()));
    }
    if target.phase() != 0 {
        return Err(QsaError::InvalidSpec(format!(
            "target {target} must carry phase +1; put signs into tg"
        )));
    }
    let support = target.support();
    if support.len() < 2 {
        return Err(QsaError::Unsupported(format!(
            "target {target} acts on fewer than two sites"
        )));
    }
    if !graph.is_connected_on(&support) {
        return Err(QsaError::Infeasible(format!(
            "support {support:?} is not connected in the graph"
        )));
    }
    let nb = support.len();
    let (plan, resolved) = match strategy {
        Strategy::Doubling => {
            let plan = best_matching_growth(&support, graph);
            if plan.layers.len() != depth_bound(nb, Strategy::Doubling)? {
                return Err(QsaError::Infeasible("graph does not admit doubling growth".into()));
            }
            (plan, Resolved::Doubling)
        }
        Strategy::LineEndpoints => (
            line_endpoints_growth(&support, graph)
                .ok_or_else(|| QsaError::Infeasible("support is not a line in the graph".into()))?,
            Resolved::LineEndpoints,
        ),
        Strategy::SingleEndpoint => (single_endpoint_growth(&support, graph), Resolved::SingleEndpoint),
        Strategy::Auto => {
            let greedy = best_matching_growth(&support, graph);
            if greedy.layers.len() == depth_bound(nb, Strategy::Doubling)? {
                (greedy, Resolved::Doubling)
            } else {
                match line_endpoints_growth(&support, graph) {
                    Some(line) if line.layers.len() <= greedy.layers.len() => (line, Resolved::LineEndpoints),
                    _ => (greedy, Resolved::Greedy),
                }
            }
        }
    };
    let schedule = build_schedule(target, &plan)?;
    Ok((schedule, resolved))
}

fn build_schedule(target: &PauliString, plan: &GrowthPlan) -> Result<QsaSchedule> {
    let n = target.n_sites();
    let (a, b) = plan.seed;
    let seed = PauliString::from_sparse(n, &[(a, Pauli::X), (b, Pauli::X)])?;
    let mut current = vec![Pauli::I; n];
    current[a] = Pauli::X;
    current[b] = Pauli::X;
    let mut layers = Vec::with_capacity(plan.layers.len());
    for pairs in &plan.layers {
        let mut layer = Vec::with_capacity(pairs.len());
        for &(c, t) in pairs {
            layer.push(AttachmentSpec::new(c, Pauli::Z, Pauli::X, t, Pauli::X)?);
            current[c] = if current[c] == Pauli::X { Pauli::Z } else { Pauli::X };
            current[t] = Pauli::X;
        }
        layers.push(layer);
    }
    let mut final_swappers = Vec::new();
    for site in target.support() {
        let want = target.letter(site);
        if current[site] != want {
            final_swappers.push(SwapperSpec::new(site, current[site], want)?);
        }
    }
    let schedule = QsaSchedule {
        n_sites: n,
        seed: Seed { string: seed, tg: 1.0 },
        layers,
        final_swappers,
        target: target.clone(),
    };
    let replayed = replay_symbolic(&schedule)?;
    if &replayed != target {
        return Err(QsaError::InvalidSchedule(format!(
            "compiled schedule replays to {replayed}, expected {target}"
        )));
    }
    Ok(schedule)
}

/// Ordering key for seed edges: fewer layers first, then pairs centred in the
/// sorted support, then adjacent positions, then the lowest index pair.
fn seed_key(support: &[usize], a: usize, b: usize) -> (usize, usize, usize, usize) {
    let pa = support.binary_search(&a).expect("in support");
    let pb = support.binary_search(&b).expect("in support");
    let centre = (pa + pb).abs_diff(support.len() - 1);
    (centre, pb.abs_diff(pa), a, b)
}

fn support_edges(support: &[usize], graph: &ConnectivityGraph) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, &a) in support.iter().enumerate() {
        for &b in &support[i + 1..] {
            if graph.has_edge(a, b) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Tries every in-support seed edge and keeps the shallowest growth.
fn best_matching_growth(support: &[usize], graph: &ConnectivityGraph) -> GrowthPlan {
    let mut best: Option<(usize, (usize, usize, usize, usize), GrowthPlan)> = None;
    let lower = ceil_log2(support.len()) - 1;
    for (a, b) in support_edges(support, graph) {
        let plan = matching_growth(support, graph, (a, b));
        let key = seed_key(support, a, b);
        let better = match &best {
            None => true,
            Some((d, k, _)) => (plan.layers.len(), key) < (*d, *k),
        };
        if better {
            best = Some((plan.layers.len(), key, plan));
        }
        if let Some((d, k, _)) = &best {
            if *d == lower && k.0 == 0 && k.1 == 1 {
                break;
            }
        }
    }
    best.expect("connected support with at least two sites has an edge").2
}

/// Layer-by-layer maximum matching between the grown support and fresh sites.
/// The number of attachments in a layer never exceeds the sites still missing,
/// so a partial last layer uses the lowest-index connectors that can reach them.
fn matching_growth(support: &[usize], graph: &ConnectivityGraph, seed: (usize, usize)) -> GrowthPlan {
    let mut grown: BTreeSet<usize> = BTreeSet::from([seed.0, seed.1]);
    let mut layers = Vec::new();
    while grown.len() < support.len() {
        let connectors: Vec<usize> = grown.iter().copied().collect();
        let fresh: Vec<usize> = support.iter().copied().filter(|s| !grown.contains(s)).collect();
        let pairs = max_matching(&connectors, &fresh, graph, fresh.len());
        if pairs.is_empty() {
            break;
        }
        grown.extend(pairs.iter().map(|&(_, t)| t));
        layers.push(pairs);
    }
    GrowthPlan { seed, layers }
}

/// Kuhn's augmenting-path matching, connectors visited in ascending order and
/// stopped once `limit` pairs are matched. Returns pairs sorted by connector.
fn max_matching(
    connectors: &[usize],
    fresh: &[usize],
    graph: &ConnectivityGraph,
    limit: usize,
) -> Vec<(usize, usize)> {
    let adj: Vec<Vec<usize>> = connectors
        .iter()
        .map(|&c| {
            fresh
                .iter()
                .enumerate()
                .filter(|(_, &f)| graph.has_edge(c, f))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; fresh.len()];
    let mut matched = 0;

    fn augment(u: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &j in &adj[u] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none() || augment(owner[j].unwrap(), adj, owner, seen) {
                owner[j] = Some(u);
                return true;
            }
        }
        false
    }

    for u in 0..connectors.len() {
        if matched == limit {
            break;
        }
        let mut seen = vec![false; fresh.len()];
        if augment(u, &adj, &mut owner, &mut seen) {
            matched += 1;
        }
    }
    let mut pairs: Vec<(usize, usize)> = owner
        .iter()
        .enumerate()
        .filter_map(|(j, o)| o.map(|u| (connectors[u], fresh[j])))
        .collect();
    pairs.sort_unstable();
    pairs
}

fn is_line(support: &[usize], graph: &ConnectivityGraph) -> bool {
    support.windows(2).all(|w| graph.has_edge(w[0], w[1]))
}

/// Seed in the middle of the sorted support; both ends grow outward.
fn line_endpoints_growth(support: &[usize], graph: &ConnectivityGraph) -> Option<GrowthPlan> {
    if !is_line(support, graph) {
        return None;
    }
    let n = support.len();
    let (mut lo, mut hi) = (n / 2 - 1, n / 2);
    let mut layers = Vec::new();
    while lo > 0 || hi < n - 1 {
        let mut layer = Vec::new();
        if lo > 0 {
            layer.push((support[lo], support[lo - 1]));
            lo -= 1;
        }
        if hi < n - 1 {
            layer.push((support[hi], support[hi + 1]));
            hi += 1;
        }
        layer.sort_unstable();
        layers.push(layer);
    }
    Some(GrowthPlan {
        seed: (support[n / 2 - 1], support[n / 2]),
        layers,
    })
}

/// One attachment per layer. On a line the seed sits at the low end and the
/// string grows along it; otherwise growth follows the graph frontier.
fn single_endpoint_growth(support: &[usize], graph: &ConnectivityGraph) -> GrowthPlan {
    if is_line(support, graph) {
        let layers = support.windows(3).map(|w| vec![(w[1], w[2])]).collect();
        return GrowthPlan {
            seed: (support[0], support[1]),
            layers,
        };
    }
    let edges = support_edges(support, graph);
    let seed = edges[0];
    let mut grown = BTreeSet::from([seed.0, seed.1]);
    let mut last = seed.1;
    let mut layers = Vec::new();
    while grown.len() < support.len() {
        // Prefer extending from the most recent site so the string stays a walk.
        let mut pick = None;
        for c in std::iter::once(last).chain(grown.iter().copied()) {
            if let Some(&t) = graph
                .neighbors(c)
                .iter()
                .find(|t| support.binary_search(t).is_ok() && !grown.contains(t))
            {
                pick = Some((c, t));
                break;
            }
        }
        let (c, t) = pick.expect("support is connected");
        grown.insert(t);
        last = t;
        layers.push(vec![(c, t)]);
    }
    GrowthPlan { seed, layers }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn depth_bounds() {
        assert_eq!(depth_bound(4, Strategy::Doubling).unwrap(), 1);
        assert_eq!(depth_bound(8, Strategy::Doubling).unwrap(), 2);
        assert_eq!(depth_bound(5, Strategy::Doubling).unwrap(), 2);
        assert_eq!(depth_bound(2, Strategy::Doubling).unwrap(), 0);
        assert_eq!(depth_bound(10, Strategy::LineEndpoints).unwrap(), 4);
        assert_eq!(depth_bound(5, Strategy::SingleEndpoint).unwrap(), 3);
        assert!(depth_bound(1, Strategy::Doubling).is_err());
    }

    #[test]
    fn plaquette_compiles_in_one_layer() {
        let target = ps("XZZX");
        let s = compile(&target, &ConnectivityGraph::complete(4), Strategy::Auto).unwrap();
        assert_eq!(s.depth(), 1);
        assert_eq!(s.layers[0].len(), 2);
        assert_eq!(s.seed.string, ps("IXXI"));
        assert!(s.final_swappers.is_empty());
        assert!(validate(&s, &ConnectivityGraph::complete(4)).is_clean());
    }

    #[test]
    fn identity_schedule_replays_seed() {
        let s = QsaSchedule {
            n_sites: 2,
            seed: Seed { string: ps("XX"), tg: 0.0 },
            layers: vec![],
            final_swappers: vec![],
            target: ps("XX"),
        };
        assert_eq!(replay_symbolic(&s).unwrap(), ps("XX"));
    }

    #[test]
    fn path_without_long_edges_falls_back_to_line() {
        let target = PauliString::new(vec![Pauli::X; 8], 0).unwrap();
        let (s, how) = compile_resolved(&target, &ConnectivityGraph::path(8), Strategy::Auto).unwrap();
        assert_eq!(how, Resolved::LineEndpoints);
        assert_eq!(s.depth(), 3);
        assert!(compile(&target, &ConnectivityGraph::path(8), Strategy::Doubling).is_err());
    }

    #[test]
    fn disconnected_support_is_infeasible() {
        let g = ConnectivityGraph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            compile(&ps("XXXX"), &g, Strategy::Auto),
            Err(QsaError::Infeasible(_))
        ));
        assert!(matches!(
            compile(&ps("IXII"), &g, Strategy::Auto),
            Err(QsaError::Unsupported(_))
        ));
    }

    #[test]
    fn validation_flags_overlap_and_staleness() {
        let g = ConnectivityGraph::complete(4);
        let mut s = compile(&ps("XZZX"), &g, Strategy::Auto).unwrap();
        let good = s.layers[0][0];
        let clash = AttachmentSpec::new(good.connector_site(), Pauli::Z, Pauli::X, 3, Pauli::X).unwrap();
        s.layers[0] = vec![good, clash];
        let names: Vec<&str> = validate(&s, &g).violations.iter().map(|v| v.name()).collect();
        assert!(names.contains(&"layer_disjointness"));

        let mut s = compile(&ps("XZZX"), &g, Strategy::Auto).unwrap();
        s.layers.push(vec![AttachmentSpec::new(0, Pauli::Z, Pauli::X, 1, Pauli::X).unwrap()]);
        let names: Vec<&str> = validate(&s, &g).violations.iter().map(|v| v.name()).collect();
        assert!(names.contains(&"freshness"));
    }

    #[test]
    fn graph_json_round_trip() {
        let g = ConnectivityGraph::path_with_next_nearest(5);
        let json = serde_json::to_string(&g).unwrap();
        let back: ConnectivityGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<ConnectivityGraph>(r#"{"n_sites":2,"edges":[[0,2]]}"#).is_err());
    }
}
