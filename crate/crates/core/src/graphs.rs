//! Network topologies and connected-component queries.
//!
//! All four generators target mean degree 4 so their results are comparable
//! to the square lattice. Graphs are immutable after construction (compact
//! CSR adjacency) and safe to share across workers; aliveness lives in a
//! separate [`AliveMask`] owned by the caller.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopologyTag {
    Lattice,
    ErdosRenyi,
    WattsStrogatz,
    ScaleFree,
}

impl TopologyTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            TopologyTag::Lattice => "lattice",
            TopologyTag::ErdosRenyi => "erdos_renyi",
            TopologyTag::WattsStrogatz => "watts_strogatz",
            TopologyTag::ScaleFree => "scale_free",
        }
    }

    pub fn parse(s: &str) -> Option<TopologyTag> {
        match s {
            "lattice" => Some(TopologyTag::Lattice),
            "erdos_renyi" => Some(TopologyTag::ErdosRenyi),
            "watts_strogatz" => Some(TopologyTag::WattsStrogatz),
            "scale_free" => Some(TopologyTag::ScaleFree),
            _ => None,
        }
    }

    /// Stable discriminant for seed derivation.
    pub fn seed_label(&self) -> u64 {
        match self {
            TopologyTag::Lattice => 1,
            TopologyTag::ErdosRenyi => 2,
            TopologyTag::WattsStrogatz => 3,
            TopologyTag::ScaleFree => 4,
        }
    }
}

impl std::fmt::Display for TopologyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Static undirected network with index-based compact neighbor lists.
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    topology: TopologyTag,
    lattice_side: Option<usize>,
}

impl Graph {
    /// Build from an undirected edge list. Each `(u, v)` pair contributes one
    /// entry to both endpoints' neighbor lists; the caller is responsible for
    /// supplying a simple edge list (no duplicates, no self-loops) except in
    /// the degenerate L = 2 lattice where coincident wrap edges are kept.
    /// Pass a `lattice_side` only when the nodes really are row-major lattice
    /// coordinates; block and linear maps rely on it.
    pub fn from_edges(
        n: usize,
        edges: &[(u32, u32)],
        topology: TopologyTag,
        lattice_side: Option<usize>,
    ) -> Graph {
        assert!(n <= u32::MAX as usize, "node count exceeds u32 index space");
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for d in &degree {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0u32; acc];
        for &(u, v) in edges {
            targets[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            targets[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        // sorted neighbor lists give a canonical layout for serialization
        for u in 0..n {
            targets[offsets[u]..offsets[u + 1]].sort_unstable();
        }
        Graph {
            offsets,
            targets,
            topology,
            lattice_side,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges (each counted once).
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.targets[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    pub fn degree(&self, u: u32) -> usize {
        self.neighbors(u).len()
    }

    pub fn mean_degree(&self) -> f64 {
        self.targets.len() as f64 / self.node_count() as f64
    }

    pub fn topology(&self) -> TopologyTag {
        self.topology
    }

    pub fn lattice_side(&self) -> Option<usize> {
        self.lattice_side
    }

    /// Check structural invariants: symmetric adjacency, no self-loops, no
    /// duplicate edges. The L = 2 lattice is exempt from the duplicate check
    /// (its wrap edges coincide by construction).
    pub fn validate(&self) -> Result<()> {
        let allow_parallel = self.topology == TopologyTag::Lattice && self.lattice_side == Some(2);
        for u in 0..self.node_count() as u32 {
            let nbrs = self.neighbors(u);
            for (k, &v) in nbrs.iter().enumerate() {
                if v == u {
                    return Err(Error::InvalidParameter(format!("self-loop at node {u}")));
                }
                if !allow_parallel && k > 0 && nbrs[k - 1] == v {
                    return Err(Error::InvalidParameter(format!(
                        "duplicate edge {u}-{v}"
                    )));
                }
                // symmetry: u must appear in v's list
                if self.neighbors(v).binary_search(&u).is_err() {
                    return Err(Error::InvalidParameter(format!(
                        "asymmetric edge {u}-{v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-node aliveness state for one layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliveMask {
    bits: Vec<bool>,
}

impl AliveMask {
    pub fn all_alive(n: usize) -> AliveMask {
        AliveMask {
            bits: vec![true; n],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> AliveMask {
        AliveMask { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn is_alive(&self, i: u32) -> bool {
        self.bits[i as usize]
    }

    #[inline]
    pub fn kill(&mut self, i: u32) {
        self.bits[i as usize] = false;
    }

    pub fn count_alive(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Square lattice with periodic (toroidal) boundary: N = L², every node has
/// exactly four neighbors.
pub fn generate_square_lattice(side: usize) -> Result<Graph> {
    if side < 2 {
        return Err(Error::InvalidParameter(format!(
            "lattice side must be >= 2, got {side}"
        )));
    }
    let n = side * side;
    let idx = |x: usize, y: usize| (x + side * y) as u32;
    let mut edges = Vec::with_capacity(2 * n);
    for y in 0..side {
        for x in 0..side {
            // right and down neighbors cover every edge exactly once; for
            // L = 2 the wrap partner coincides with the direct one, and both
            // entries are kept so every node still has four neighbor slots
            edges.push((idx(x, y), idx((x + 1) % side, y)));
            edges.push((idx(x, y), idx(x, (y + 1) % side)));
        }
    }
    Ok(Graph::from_edges(
        n,
        &edges,
        TopologyTag::Lattice,
        Some(side),
    ))
}

/// Erdős–Rényi G(N, p) with p chosen to hit the requested mean degree.
pub fn generate_er(n: usize, mean_degree: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "ER node count must be >= 2, got {n}"
        )));
    }
    if !(mean_degree > 0.0) || mean_degree > (n - 1) as f64 {
        return Err(Error::InvalidParameter(format!(
            "ER mean degree must lie in (0, N-1], got {mean_degree}"
        )));
    }
    let p_edge = mean_degree / (n - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity((mean_degree * n as f64 / 2.0) as usize);
    if p_edge >= 1.0 {
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                edges.push((u, v));
            }
        }
        return Ok(Graph::from_edges(n, &edges, TopologyTag::ErdosRenyi, None));
    }
    // geometric skip sampling over the lexicographic pair stream: O(E)
    let log_q = (1.0 - p_edge).ln();
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let r: f64 = rng.gen::<f64>();
        let skip = ((1.0 - r).ln() / log_q).floor() as i64;
        w += 1 + skip;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as u32, v as u32));
        }
    }
    Ok(Graph::from_edges(n, &edges, TopologyTag::ErdosRenyi, None))
}

/// Watts–Strogatz small-world graph: ring lattice of even degree
/// `mean_degree`, each edge's far endpoint rewired with probability `beta`.
/// Rewiring moves one endpoint only, so the edge count (and mean degree) is
/// preserved exactly.
pub fn generate_ws(n: usize, mean_degree: usize, beta: f64, seed: u64) -> Result<Graph> {
    if mean_degree == 0 || mean_degree % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "WS mean degree must be even and positive, got {mean_degree}"
        )));
    }
    if mean_degree >= n {
        return Err(Error::InvalidParameter(format!(
            "WS mean degree {mean_degree} must be < N = {n}"
        )));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "WS rewiring probability must lie in [0, 1], got {beta}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = mean_degree / 2;
    let mut adj: Vec<Vec<u32>> = vec![Vec::with_capacity(mean_degree); n];
    let add = |adj: &mut Vec<Vec<u32>>, u: u32, v: u32| {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    };
    for j in 1..=half {
        for i in 0..n {
            add(&mut adj, i as u32, ((i + j) % n) as u32);
        }
    }
    // rewire in construction order
    for j in 1..=half {
        for i in 0..n {
            if !rng.gen_bool(beta) {
                continue;
            }
            let u = i as u32;
            let v = ((i + j) % n) as u32;
            if adj[u as usize].len() >= n - 1 {
                continue; // u already adjacent to everyone else
            }
            // current edge may have been rewired away already by an earlier pass
            let pos_uv = match adj[u as usize].iter().position(|&x| x == v) {
                Some(p) => p,
                None => continue,
            };
            let w = loop {
                let cand = rng.gen_range(0..n as u32);
                if cand != u && !adj[u as usize].contains(&cand) {
                    break cand;
                }
            };
            adj[u as usize].swap_remove(pos_uv);
            let pos_vu = adj[v as usize].iter().position(|&x| x == u).unwrap();
            adj[v as usize].swap_remove(pos_vu);
            add(&mut adj, u, w);
        }
    }
    let mut edges = Vec::with_capacity(n * half);
    for u in 0..n {
        for &v in &adj[u] {
            if (v as usize) > u {
                edges.push((u as u32, v));
            }
        }
    }
    Ok(Graph::from_edges(
        n,
        &edges,
        TopologyTag::WattsStrogatz,
        None,
    ))
}

/// Scale-free configuration model. Degrees are drawn from a truncated power
/// law k^(-exponent) on [k_min, sqrt(N)], k_min being the smallest integer
/// whose distribution mean reaches `mean_degree`; excess stubs are then
/// trimmed uniformly at random (each removal hits a node with probability
/// proportional to its degree, which preserves the tail shape) until the stub
/// total equals round(mean_degree * N) made even. Self-loops and duplicate
/// pairs from the stub matching are dropped.
pub fn generate_sf(n: usize, exponent: f64, mean_degree: f64, seed: u64) -> Result<Graph> {
    if exponent <= 2.0 {
        return Err(Error::InvalidParameter(format!(
            "scale-free exponent must be > 2 (finite mean), got {exponent}"
        )));
    }
    if n < 100 {
        return Err(Error::InvalidParameter(format!(
            "scale-free generator needs N >= 100, got {n}"
        )));
    }
    let k_max = (n as f64).sqrt().floor() as usize;
    let k_min = (1..=k_max)
        .find(|&k_min| {
            let (mut num, mut den) = (0.0, 0.0);
            for k in k_min..=k_max {
                let w = (k as f64).powf(-exponent);
                num += k as f64 * w;
                den += w;
            }
            num / den >= mean_degree
        })
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "no minimum degree reaches mean degree {mean_degree} with exponent {exponent}"
            ))
        })?;

    // cumulative weights for inverse-CDF sampling of the truncated power law
    let mut cdf = Vec::with_capacity(k_max - k_min + 1);
    let mut acc = 0.0;
    for k in k_min..=k_max {
        acc += (k as f64).powf(-exponent);
        cdf.push(acc);
    }
    let total = acc;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degrees: Vec<u32> = (0..n)
        .map(|_| {
            let r = rng.gen::<f64>() * total;
            let j = cdf.partition_point(|&c| c < r).min(cdf.len() - 1);
            (k_min + j) as u32
        })
        .collect();

    // stub list: node id repeated degree times
    let mut stubs: Vec<u32> = Vec::with_capacity(degrees.iter().map(|&d| d as usize).sum());
    for (u, &d) in degrees.iter().enumerate() {
        for _ in 0..d {
            stubs.push(u as u32);
        }
    }
    let mut target = (mean_degree * n as f64).round() as usize;
    if target % 2 == 1 {
        // handshake parity: one extra stub keeps the total even
        target += 1;
    }
    while stubs.len() > target {
        let i = rng.gen_range(0..stubs.len());
        let u = stubs[i];
        if degrees[u as usize] <= 1 {
            continue; // keep every node attached
        }
        degrees[u as usize] -= 1;
        stubs.swap_remove(i);
    }
    while stubs.len() < target {
        let u = rng.gen_range(0..n as u32);
        degrees[u as usize] += 1;
        stubs.push(u);
    }

    stubs.shuffle(&mut rng);
    let mut seen = std::collections::HashSet::with_capacity(stubs.len() / 2);
    let mut edges = Vec::with_capacity(stubs.len() / 2);
    for pair in stubs.chunks_exact(2) {
        let (u, v) = (pair[0], pair[1]);
        if u == v {
            continue;
        }
        let key = if u < v { (u, v) } else { (v, u) };
        if seen.insert(key) {
            edges.push(key);
        }
    }
    Ok(Graph::from_edges(n, &edges, TopologyTag::ScaleFree, None))
}

// ---------------------------------------------------------------------------
// Connected components
// ---------------------------------------------------------------------------

/// Union-find scratch space, reusable across repeated component queries.
pub struct ComponentScratch {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl ComponentScratch {
    pub fn new(n: usize) -> ComponentScratch {
        ComponentScratch {
            parent: vec![0; n],
            size: vec![0; n],
        }
    }

    #[inline]
    fn find(&mut self, mut x: u32) -> u32 {
        // path halving
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }

    /// Union all edges between alive nodes and return the root and size of
    /// the largest component, breaking size ties toward the component whose
    /// minimum node index is lowest. `None` when no node is alive.
    pub fn largest_component(&mut self, g: &Graph, alive: &[bool]) -> Option<(u32, u32)> {
        let n = g.node_count();
        debug_assert_eq!(alive.len(), n);
        for i in 0..n {
            self.parent[i] = i as u32;
            self.size[i] = 1;
        }
        for u in 0..n as u32 {
            if !alive[u as usize] {
                continue;
            }
            for &v in g.neighbors(u) {
                if v > u && alive[v as usize] {
                    self.union(u, v);
                }
            }
        }
        let mut best: Option<(u32, u32)> = None;
        for u in 0..n as u32 {
            if !alive[u as usize] {
                continue;
            }
            let r = self.find(u);
            let s = self.size[r as usize];
            // strict comparison: the first component reaching a given size is
            // the one containing the smallest node index
            if best.map_or(true, |(_, bs)| s > bs) {
                best = Some((r, s));
            }
        }
        best
    }

    /// Membership test valid right after `largest_component`.
    #[inline]
    pub fn in_component(&mut self, node: u32, root: u32) -> bool {
        self.find(node) == root
    }
}

/// Largest connected component among alive nodes, as a sorted node list.
/// Ties between equal-size components go to the one with the lowest minimum
/// node index; an all-dead mask yields an empty set.
pub fn giant_component(g: &Graph, mask: &AliveMask) -> Vec<u32> {
    assert_eq!(
        mask.len(),
        g.node_count(),
        "mask length must match node count"
    );
    let mut scratch = ComponentScratch::new(g.node_count());
    match scratch.largest_component(g, mask.as_slice()) {
        None => Vec::new(),
        Some((root, size)) => {
            let mut members = Vec::with_capacity(size as usize);
            for u in 0..g.node_count() as u32 {
                if mask.is_alive(u) && scratch.in_component(u, root) {
                    members.push(u);
                }
            }
            members
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization: edge-list text format
// ---------------------------------------------------------------------------

/// Write `# N=<n> topology=<tag> seed=<s>` followed by one `u v` pair per line.
pub fn write_edge_list<W: Write>(g: &Graph, seed: u64, out: &mut W) -> std::io::Result<()> {
    writeln!(
        out,
        "# N={} topology={} seed={}",
        g.node_count(),
        g.topology().as_str(),
        seed
    )?;
    for u in 0..g.node_count() as u32 {
        for &v in g.neighbors(u) {
            if v >= u {
                writeln!(out, "{u} {v}")?;
            }
        }
    }
    Ok(())
}

/// Parse the format produced by [`write_edge_list`].
pub fn read_edge_list<R: BufRead>(input: R) -> Result<Graph> {
    let path = "<edge list>";
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(path, "empty input"))?
        .map_err(|e| Error::io(path, e))?;
    let (n, topology) = parse_edge_header(&header).ok_or_else(|| {
        Error::parse(path, format!("malformed header line: {header:?}"))
    })?;
    let mut edges = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let u: u32 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(path, format!("bad edge line: {line:?}")))?;
        let v: u32 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(path, format!("bad edge line: {line:?}")))?;
        if u as usize >= n || v as usize >= n {
            return Err(Error::parse(path, format!("edge {u}-{v} out of range")));
        }
        edges.push((u, v));
    }
    let lattice_side = match topology {
        TopologyTag::Lattice => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return Err(Error::parse(path, format!("lattice N = {n} is not a square")));
            }
            Some(side)
        }
        _ => None,
    };
    Ok(Graph::from_edges(n, &edges, topology, lattice_side))
}

fn parse_edge_header(header: &str) -> Option<(usize, TopologyTag)> {
    let rest = header.strip_prefix('#')?.trim();
    let mut n = None;
    let mut topology = None;
    for field in rest.split_whitespace() {
        if let Some(v) = field.strip_prefix("N=") {
            n = v.parse().ok();
        } else if let Some(v) = field.strip_prefix("topology=") {
            topology = TopologyTag::parse(v);
        }
    }
    Some((n?, topology?))
}
