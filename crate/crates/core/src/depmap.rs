//! Dependency maps between the two layers and their permutation analytics.
//!
//! A dependency map is a permutation pi of 0..N-1: node i in layer A depends
//! on node pi[i] in layer B, and (through the inverse) node j in layer B
//! depends on node pi^-1(j) in layer A. The constructors here interpolate
//! between the ordered identity coupling and a fully random one, either
//! globally (fractional rewiring) or with spatial structure (block-local
//! shuffles, rigid lattice shifts).

use std::io::{BufRead, Write};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind {
    Identity,
    Rewired { q: f64 },
    BlockLocal { r: usize },
    Linear { r: usize },
    LinearAxis { r: usize },
}

impl MapKind {
    pub fn tag(&self) -> &'static str {
        match self {
            MapKind::Identity => "identity",
            MapKind::Rewired { .. } => "rewired",
            MapKind::BlockLocal { .. } => "block_local",
            MapKind::Linear { .. } => "linear",
            MapKind::LinearAxis { .. } => "linear_axis",
        }
    }
}

/// Permutation coupling layer A to layer B.
#[derive(Debug, Clone, PartialEq)]
pub struct DependencyMap {
    targets: Vec<u32>,
    kind: MapKind,
}

impl DependencyMap {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Partner of node i in the other layer.
    #[inline]
    pub fn target(&self, i: u32) -> u32 {
        self.targets[i as usize]
    }

    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    /// Wrap an explicit permutation. Rejects anything that is not one.
    pub fn from_permutation(targets: Vec<u32>, kind: MapKind) -> Result<DependencyMap> {
        let map = DependencyMap { targets, kind };
        map.validate()?;
        Ok(map)
    }

    /// Inverse permutation: maps layer-B indices back to layer A.
    pub fn inverse(&self) -> Vec<u32> {
        let mut inv = vec![0u32; self.targets.len()];
        for (i, &t) in self.targets.iter().enumerate() {
            inv[t as usize] = i as u32;
        }
        inv
    }

    /// The inverse as a map of the same kind.
    pub fn inverted(&self) -> DependencyMap {
        DependencyMap {
            targets: self.inverse(),
            kind: self.kind,
        }
    }

    /// Number of indices with pi[i] = i.
    pub fn fixed_points(&self) -> usize {
        self.targets
            .iter()
            .enumerate()
            .filter(|&(i, &t)| i as u32 == t)
            .count()
    }

    /// Verify the permutation property: every index appears exactly once.
    pub fn validate(&self) -> Result<()> {
        let n = self.targets.len();
        let mut seen = vec![false; n];
        for &t in &self.targets {
            let t = t as usize;
            if t >= n {
                return Err(Error::InvalidParameter(format!(
                    "map target {t} out of range for N = {n}"
                )));
            }
            if seen[t] {
                return Err(Error::InvalidParameter(format!(
                    "map target {t} appears more than once"
                )));
            }
            seen[t] = true;
        }
        Ok(())
    }

    /// Signal series pi[i] - i used by the entropy analysis.
    pub fn offset_series(&self) -> Vec<f64> {
        self.targets
            .iter()
            .enumerate()
            .map(|(i, &t)| t as f64 - i as f64)
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

pub fn identity_map(n: usize) -> Result<DependencyMap> {
    if n == 0 {
        return Err(Error::InvalidParameter("map size must be >= 1".into()));
    }
    Ok(DependencyMap {
        targets: (0..n as u32).collect(),
        kind: MapKind::Identity,
    })
}

/// Mark each index independently with probability `q`, then uniformly permute
/// the targets of the marked indices among themselves. q = 1 therefore yields
/// a uniform random permutation of the base map's targets.
pub fn rewire_map(base: &DependencyMap, q: f64, seed: u64) -> Result<DependencyMap> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "rewiring probability must lie in [0, 1], got {q}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets = base.targets.clone();
    let marked: Vec<usize> = (0..targets.len())
        .filter(|_| rng.gen_bool(q))
        .collect();
    let mut shuffled: Vec<u32> = marked.iter().map(|&i| targets[i]).collect();
    shuffled.shuffle(&mut rng);
    for (&i, &t) in marked.iter().zip(&shuffled) {
        targets[i] = t;
    }
    Ok(DependencyMap {
        targets,
        kind: MapKind::Rewired { q },
    })
}

/// Partition the L x L lattice into ceil(L/r)^2 axis-aligned blocks of side r
/// (edge blocks truncated when r does not divide L) and uniformly permute the
/// targets within each block.
pub fn block_local_map(side: usize, r: usize, seed: u64) -> Result<DependencyMap> {
    if side == 0 {
        return Err(Error::InvalidParameter("lattice side must be >= 1".into()));
    }
    if r == 0 || r > side {
        return Err(Error::InvalidParameter(format!(
            "block side must lie in [1, L], got r = {r} with L = {side}"
        )));
    }
    let n = side * side;
    let mut targets: Vec<u32> = (0..n as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks_per_row = side.div_ceil(r);
    let mut block = Vec::with_capacity(r * r);
    for by in 0..blocks_per_row {
        for bx in 0..blocks_per_row {
            block.clear();
            for y in (by * r)..((by + 1) * r).min(side) {
                for x in (bx * r)..((bx + 1) * r).min(side) {
                    block.push((x + side * y) as u32);
                }
            }
            let mut imgs: Vec<u32> = block.clone();
            imgs.shuffle(&mut rng);
            for (&i, &t) in block.iter().zip(&imgs) {
                targets[i as usize] = t;
            }
        }
    }
    Ok(DependencyMap {
        targets,
        kind: MapKind::BlockLocal { r },
    })
}

/// Rigid diagonal shift: lattice node (x, y) depends on ((x+r) mod L,
/// (y+r) mod L). Both r = 0 and r = L give the identity.
pub fn linear_map(side: usize, r: usize) -> Result<DependencyMap> {
    if side == 0 {
        return Err(Error::InvalidParameter("lattice side must be >= 1".into()));
    }
    if r > side {
        return Err(Error::InvalidParameter(format!(
            "shift length must lie in [0, L], got r = {r} with L = {side}"
        )));
    }
    let n = side * side;
    let mut targets = vec![0u32; n];
    for y in 0..side {
        for x in 0..side {
            targets[x + side * y] = (((x + r) % side) + side * ((y + r) % side)) as u32;
        }
    }
    Ok(DependencyMap {
        targets,
        kind: MapKind::Linear { r },
    })
}

/// Axis-only variant of [`linear_map`]: (x, y) depends on ((x+r) mod L, y).
pub fn linear_map_axis(side: usize, r: usize) -> Result<DependencyMap> {
    if side == 0 {
        return Err(Error::InvalidParameter("lattice side must be >= 1".into()));
    }
    if r > side {
        return Err(Error::InvalidParameter(format!(
            "shift length must lie in [0, L], got r = {r} with L = {side}"
        )));
    }
    let n = side * side;
    let mut targets = vec![0u32; n];
    for y in 0..side {
        for x in 0..side {
            targets[x + side * y] = (((x + r) % side) + side * y) as u32;
        }
    }
    Ok(DependencyMap {
        targets,
        kind: MapKind::LinearAxis { r },
    })
}

// ---------------------------------------------------------------------------
// Permutation analytics
// ---------------------------------------------------------------------------

/// Count of fixed-point-free permutations of n elements, via the recurrence
/// D(n) = (n-1)(D(n-1) + D(n-2)).
pub fn derangements(n: usize) -> BigUint {
    match n {
        0 => BigUint::one(),
        1 => BigUint::zero(),
        _ => {
            let mut prev2 = BigUint::one(); // D(0)
            let mut prev1 = BigUint::zero(); // D(1)
            for k in 2..=n {
                let next = BigUint::from(k - 1) * (&prev1 + &prev2);
                prev2 = prev1;
                prev1 = next;
            }
            prev1
        }
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

fn binomial(n: usize, k: usize) -> BigUint {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Expected number of fixed points of a uniform random permutation of n
/// elements: sum over m of m * C(n, m) * D(n - m) / n!. Evaluated with exact
/// big-integer arithmetic for n <= 20; the sum telescopes to exactly 1 for
/// every n >= 1, so 1.0 is returned analytically beyond that range.
pub fn expected_fixed_points(n: usize) -> f64 {
    assert!(n >= 1, "expected_fixed_points needs n >= 1");
    if n > 20 {
        return 1.0;
    }
    let mut num = BigUint::zero();
    for m in 1..=n {
        num += BigUint::from(m) * binomial(n, m) * derangements(n - m);
    }
    let den = factorial(n);
    if num == den {
        return 1.0;
    }
    num.to_f64().unwrap() / den.to_f64().unwrap()
}

/// Probability that a node and its dependency partner share the same index
/// after an attack leaving fraction p, on a map rewired with probability q:
/// (1-q)*p + p*E(q*n)/(q*n). The second term is taken as 0 when q = 0 and
/// vanishes as n grows, leaving the (1-q)*p limit.
pub fn p_same(q: f64, p: f64, n: usize) -> f64 {
    assert!((0.0..=1.0).contains(&q), "q must lie in [0, 1]");
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1]");
    assert!(n >= 1, "n must be >= 1");
    let m = q * n as f64;
    let correction = if m > 0.0 {
        p * expected_fixed_points(m.round().max(1.0) as usize) / m
    } else {
        0.0
    };
    (1.0 - q) * p + correction
}

/// Derangement count and exact fixed-point expectation for one n.
#[derive(Debug, Clone)]
pub struct FixedPointStats {
    pub n: usize,
    pub expected_fixed_points: f64,
    pub derangements: BigUint,
}

impl FixedPointStats {
    pub fn compute(n: usize) -> FixedPointStats {
        FixedPointStats {
            n,
            expected_fixed_points: expected_fixed_points(n),
            derangements: derangements(n),
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization: one target per line
// ---------------------------------------------------------------------------

/// Write `# N=<n> tag=<tag> q=<q> r=<r> seed=<s>` followed by pi[i], one per
/// line. Parameters not applicable to the map kind are recorded as `-`.
pub fn write_map<W: Write>(map: &DependencyMap, seed: u64, out: &mut W) -> std::io::Result<()> {
    let (q, r) = match map.kind() {
        MapKind::Identity => ("-".to_string(), "-".to_string()),
        MapKind::Rewired { q } => (format!("{q}"), "-".to_string()),
        MapKind::BlockLocal { r } => ("-".to_string(), format!("{r}")),
        MapKind::Linear { r } | MapKind::LinearAxis { r } => ("-".to_string(), format!("{r}")),
    };
    writeln!(
        out,
        "# N={} tag={} q={} r={} seed={}",
        map.len(),
        map.kind().tag(),
        q,
        r,
        seed
    )?;
    for &t in map.targets() {
        writeln!(out, "{t}")?;
    }
    Ok(())
}

/// Parse the format produced by [`write_map`].
pub fn read_map<R: BufRead>(input: R) -> Result<DependencyMap> {
    let path = "<map>";
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(path, "empty input"))?
        .map_err(|e| Error::io(path, e))?;
    let (n, kind) = parse_map_header(&header)
        .ok_or_else(|| Error::parse(path, format!("malformed header line: {header:?}")))?;
    let mut targets = Vec::with_capacity(n);
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let t: u32 = line
            .parse()
            .map_err(|_| Error::parse(path, format!("bad target line: {line:?}")))?;
        targets.push(t);
    }
    if targets.len() != n {
        return Err(Error::parse(
            path,
            format!("expected {n} targets, found {}", targets.len()),
        ));
    }
    let map = DependencyMap { targets, kind };
    map.validate()?;
    Ok(map)
}

fn parse_map_header(header: &str) -> Option<(usize, MapKind)> {
    let rest = header.strip_prefix('#')?.trim();
    let mut n = None;
    let mut tag = None;
    let mut q = None;
    let mut r = None;
    for field in rest.split_whitespace() {
        if let Some(v) = field.strip_prefix("N=") {
            n = v.parse().ok();
        } else if let Some(v) = field.strip_prefix("tag=") {
            tag = Some(v.to_string());
        } else if let Some(v) = field.strip_prefix("q=") {
            q = v.parse::<f64>().ok();
        } else if let Some(v) = field.strip_prefix("r=") {
            r = v.parse::<usize>().ok();
        }
    }
    let kind = match tag?.as_str() {
        "identity" => MapKind::Identity,
        "rewired" => MapKind::Rewired { q: q? },
        "block_local" => MapKind::BlockLocal { r: r? },
        "linear" => MapKind::Linear { r: r? },
        "linear_axis" => MapKind::LinearAxis { r: r? },
        _ => return None,
    };
    Some((n?, kind))
}
